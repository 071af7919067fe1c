//! Self-avoiding excursions, chronological loop erasure, exact excursion
//! sampling by h-transform, exact loop-erased weights and the two-path Fomin
//! identity.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{excursion_from_matrix, GreenMatrix, LatticeDomain, LatticePoint, LatticeWalk};
use crate::linalg::{green_downdate, DenseMatrix};
use crate::loops::log_theta_from_green;
use crate::scalar::Scalar;
use crate::stats::{Estimate, RunningStats};

/// Default cap on the number of search-tree nodes visited by the enumerators.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 500_000_000;

/// An excursion without repeated points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelfAvoidingExcursion {
    walk: LatticeWalk,
}

impl SelfAvoidingExcursion {
    pub fn new(walk: LatticeWalk, domain: &LatticeDomain) -> Result<Self> {
        let eta = Self { walk };
        eta.check_in(domain)?;
        Ok(eta)
    }

    pub(crate) fn from_points_unchecked(points: Vec<LatticePoint>) -> Self {
        Self {
            walk: LatticeWalk::from_trusted(points),
        }
    }

    /// Verifies that this is a self-avoiding excursion in `domain`.
    pub fn check_in(&self, domain: &LatticeDomain) -> Result<()> {
        if !self.walk.is_excursion_in(domain) {
            return Err(Error::InvalidWalk(format!("{} is not an excursion in the domain", self.walk)));
        }
        let mut seen = HashSet::new();
        for &p in self.walk.points() {
            if !seen.insert(p) {
                return Err(Error::NotSelfAvoiding(p));
            }
        }
        Ok(())
    }

    pub fn walk(&self) -> &LatticeWalk {
        &self.walk
    }

    pub fn into_walk(self) -> LatticeWalk {
        self.walk
    }

    pub fn points(&self) -> &[LatticePoint] {
        self.walk.points()
    }

    pub fn inner(&self) -> &[LatticePoint] {
        self.walk.inner()
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.walk.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walk.is_empty()
    }

    pub fn start(&self) -> LatticePoint {
        self.walk.start()
    }

    pub fn end(&self) -> LatticePoint {
        self.walk.end()
    }
}

/// Chronological loop erasure.
pub fn loop_erase(walk: &LatticeWalk) -> LatticeWalk {
    let mut out: Vec<LatticePoint> = Vec::with_capacity(walk.points().len());
    let mut position: HashMap<LatticePoint, usize> = HashMap::new();
    for &p in walk.points() {
        if let Some(&k) = position.get(&p) {
            for q in out.drain(k + 1..) {
                position.remove(&q);
            }
        } else {
            position.insert(p, out.len());
            out.push(p);
        }
    }
    LatticeWalk::from_trusted(out)
}

/// Exact sampler of the normalised excursion measure from `z` to `w`.
///
/// From an interior point `u` the walk steps to `v` with probability
/// `hit(v) / (4 hit(u))`, where `hit` is the probability of leaving `A` at `w`.
#[derive(Clone, Debug)]
pub struct ExcursionSampler<T> {
    domain: LatticeDomain,
    z: LatticePoint,
    w: LatticePoint,
    kernel: T,
    start: Vec<(LatticePoint, T)>,
    table: Vec<Vec<(LatticePoint, T)>>,
}

impl<T: Scalar> ExcursionSampler<T> {
    pub fn new(domain: &LatticeDomain, z: LatticePoint, w: LatticePoint) -> Result<Self> {
        Self::from_green(&GreenMatrix::new(domain)?, z, w)
    }

    pub fn from_green(green: &GreenMatrix<T>, z: LatticePoint, w: LatticePoint) -> Result<Self> {
        let domain = green.domain();
        let kernel = green.excursion(z, w)?;
        if kernel <= T::zero() {
            return Err(Error::Unreachable { from: z, to: w });
        }
        let hit = green.hitting_vector(w);
        let quarter = T::lit(0.25);
        let row = |from: LatticePoint, norm: T| -> Vec<(LatticePoint, T)> {
            let mut acc = T::zero();
            let mut out = Vec::with_capacity(4);
            for v in from.neighbors() {
                let mass = if v == w {
                    quarter
                } else if let Some(j) = domain.index_of(v) {
                    quarter * hit[j]
                } else {
                    continue;
                };
                if mass > T::zero() {
                    acc += mass / norm;
                    out.push((v, acc));
                }
            }
            out
        };
        let start = row(z, kernel);
        let table = domain
            .interior()
            .iter()
            .enumerate()
            .map(|(i, &u)| if hit[i] > T::zero() { row(u, hit[i]) } else { Vec::new() })
            .collect();
        Ok(Self {
            domain: domain.clone(),
            z,
            w,
            kernel,
            start,
            table,
        })
    }

    /// `h_A(z, w)`.
    pub fn kernel(&self) -> T {
        self.kernel
    }

    /// Total transition probability out of `u` (or out of `z`); equals one.
    pub fn transition_sum(&self, u: LatticePoint) -> Option<T> {
        let row = if u == self.z {
            &self.start
        } else {
            &self.table[self.domain.index_of(u)?]
        };
        row.last().map(|&(_, c)| c)
    }

    fn step<R: Rng + ?Sized>(row: &[(LatticePoint, T)], rng: &mut R) -> LatticePoint {
        let u = T::sample_unit(rng) * row.last().expect("nonempty row").1;
        row.iter().find(|&&(_, c)| u < c).unwrap_or(row.last().expect("nonempty row")).0
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticeWalk {
        let mut points = vec![self.z];
        let mut here = Self::step(&self.start, rng);
        points.push(here);
        while here != self.w {
            let i = self.domain.index_of(here).expect("interior");
            here = Self::step(&self.table[i], rng);
            points.push(here);
        }
        LatticeWalk::from_trusted(points)
    }
}

/// One exact sample of the normalised excursion measure.
pub fn sample_excursion<R: Rng + ?Sized>(
    domain: &LatticeDomain,
    z: LatticePoint,
    w: LatticePoint,
    rng: &mut R,
) -> Result<LatticeWalk> {
    Ok(ExcursionSampler::<f64>::new(domain, z, w)?.sample(rng))
}

/// `4^{-|eta|} Theta_A(eta)`.
pub fn lerw_weight_exact<T: Scalar>(domain: &LatticeDomain, eta: &SelfAvoidingExcursion) -> Result<T> {
    eta.check_in(domain)?;
    let log = log_theta_from_green(&GreenMatrix::<T>::new(domain)?, eta.inner())?;
    Ok(T::lit(0.25).powi(eta.len() as i32) * log.exp())
}

/// The default length cap `|A| + 2`, which no self-avoiding excursion reaches.
pub fn default_len_cap(domain: &LatticeDomain) -> usize {
    domain.len() + 2
}

fn check_endpoints(domain: &LatticeDomain, z: LatticePoint, w: LatticePoint) -> Result<()> {
    domain.require_boundary(z)?;
    domain.require_boundary(w)?;
    if z == w {
        return Err(Error::CoincidentPoints(z));
    }
    Ok(())
}

/// Whether `w` is reachable from interior point `from` through interior points
/// not marked in `blocked`.
fn reaches(domain: &LatticeDomain, from: usize, w: LatticePoint, blocked: &[bool], scratch: &mut Vec<usize>) -> bool {
    let mut seen = vec![false; blocked.len()];
    scratch.clear();
    scratch.push(from);
    seen[from] = true;
    while let Some(i) = scratch.pop() {
        for q in domain.interior()[i].neighbors() {
            if q == w {
                return true;
            }
            if let Some(j) = domain.index_of(q) {
                if !blocked[j] && !seen[j] {
                    seen[j] = true;
                    scratch.push(j);
                }
            }
        }
    }
    false
}

/// All self-avoiding excursions from `z` to `w` with at most `len_cap` steps,
/// in depth-first order with neighbours tried as `+1, +i, -1, -i`.
pub fn enumerate_saes(
    domain: &LatticeDomain,
    z: LatticePoint,
    w: LatticePoint,
    len_cap: usize,
    budget: usize,
) -> Result<Vec<SelfAvoidingExcursion>> {
    check_endpoints(domain, z, w)?;
    let mut out = Vec::new();
    let mut blocked = vec![false; domain.len()];
    let mut path = vec![z];
    let mut nodes = 0usize;
    let mut scratch = Vec::new();
    enumerate_rec(domain, w, len_cap, budget, &mut nodes, &mut blocked, &mut path, &mut scratch, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    domain: &LatticeDomain,
    w: LatticePoint,
    len_cap: usize,
    budget: usize,
    nodes: &mut usize,
    blocked: &mut [bool],
    path: &mut Vec<LatticePoint>,
    scratch: &mut Vec<usize>,
    out: &mut Vec<SelfAvoidingExcursion>,
) -> Result<()> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::Budget {
            what: "excursion enumeration",
            limit: budget,
        });
    }
    let here = *path.last().expect("nonempty");
    let steps = path.len() - 1;
    for next in here.neighbors() {
        if steps + 1 > len_cap {
            break;
        }
        if next == w {
            let mut pts = path.clone();
            pts.push(w);
            out.push(SelfAvoidingExcursion::from_points_unchecked(pts));
            continue;
        }
        let Some(j) = domain.index_of(next) else { continue };
        if blocked[j] || (steps + 1) as i64 + next.manhattan(w) > len_cap as i64 {
            continue;
        }
        blocked[j] = true;
        if reaches(domain, j, w, blocked, scratch) {
            path.push(next);
            enumerate_rec(domain, w, len_cap, budget, nodes, blocked, path, scratch, out)?;
            path.pop();
        }
        blocked[j] = false;
    }
    Ok(())
}

/// A complete self-avoiding excursion reached by [`fold_saes`].
pub struct SaeLeaf<'a, T> {
    pub points: &'a [LatticePoint],
    /// `log Theta_A` of the path.
    pub log_theta: T,
    /// Green's matrix of `A` minus the interior of the path, in the indexing of `A`.
    pub green: &'a DenseMatrix<T>,
}

struct Node<T> {
    path: Vec<LatticePoint>,
    blocked: Vec<bool>,
    green: DenseMatrix<T>,
    log_theta: T,
}

enum Task<T> {
    Leaf(Node<T>),
    Subtree(Node<T>),
}

/// Folds `visit` over every self-avoiding excursion from `z` to `w` of at most
/// `len_cap` steps, maintaining `Theta_A` and the Green's matrix of the
/// complement incrementally.
///
/// The search tree is split at a fixed depth and the subtrees are searched in
/// parallel; partial results are combined in depth-first order, so the output
/// does not depend on the number of worker threads.
#[allow(clippy::too_many_arguments)]
pub fn fold_saes<T, Acc, I, F, C>(
    green: &GreenMatrix<T>,
    z: LatticePoint,
    w: LatticePoint,
    len_cap: usize,
    budget: usize,
    init: I,
    visit: F,
    combine: C,
) -> Result<Acc>
where
    T: Scalar,
    Acc: Send,
    I: Fn() -> Acc + Sync,
    F: Fn(&mut Acc, &SaeLeaf<'_, T>) + Sync,
    C: Fn(Acc, Acc) -> Acc,
{
    let domain = green.domain();
    check_endpoints(domain, z, w)?;
    let root = Node {
        path: vec![z],
        blocked: vec![false; domain.len()],
        green: green.matrix().clone(),
        log_theta: T::zero(),
    };
    let nodes = AtomicUsize::new(0);
    let ctx = Search {
        domain,
        w,
        len_cap,
        budget,
        nodes: &nodes,
    };

    // Breadth-first split in depth-first order until there is enough work to share.
    let mut tasks = vec![Task::Subtree(root)];
    let target = 4 * rayon::current_num_threads().max(1) * 8;
    for _ in 0..len_cap {
        let open = tasks.iter().filter(|t| matches!(t, Task::Subtree(_))).count();
        if open == 0 || open >= target {
            break;
        }
        let mut next = Vec::with_capacity(tasks.len() * 3);
        for t in tasks {
            match t {
                Task::Subtree(node) => {
                    ctx.count()?;
                    ctx.children(&node, &mut next);
                }
                leaf => next.push(leaf),
            }
        }
        tasks = next;
    }

    let partials: Vec<Result<Acc>> = tasks
        .into_par_iter()
        .map(|task| {
            let mut acc = init();
            match task {
                Task::Leaf(node) => visit(&mut acc, &node.leaf()),
                Task::Subtree(mut node) => {
                    let mut scratch = Vec::new();
                    ctx.dfs(&mut node, &mut acc, &visit, &mut scratch)?;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for p in partials {
        total = combine(total, p?);
    }
    Ok(total)
}

impl<T: Scalar> Node<T> {
    fn leaf(&self) -> SaeLeaf<'_, T> {
        SaeLeaf {
            points: &self.path,
            log_theta: self.log_theta,
            green: &self.green,
        }
    }
}

struct Search<'a> {
    domain: &'a LatticeDomain,
    w: LatticePoint,
    len_cap: usize,
    budget: usize,
    nodes: &'a AtomicUsize,
}

impl Search<'_> {
    fn count(&self) -> Result<()> {
        if self.nodes.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::Budget {
                what: "excursion enumeration",
                limit: self.budget,
            });
        }
        Ok(())
    }

    /// Admissible interior successor indices of `node`, and whether `w` is adjacent.
    fn successors<T>(&self, node: &Node<T>, scratch: &mut Vec<usize>) -> (bool, Vec<usize>) {
        let here = *node.path.last().expect("nonempty");
        let steps = node.path.len() - 1;
        let mut ends = false;
        let mut out = Vec::with_capacity(4);
        if steps + 1 > self.len_cap {
            return (false, out);
        }
        let mut blocked = node.blocked.clone();
        for next in here.neighbors() {
            if next == self.w {
                ends = true;
                continue;
            }
            let Some(j) = self.domain.index_of(next) else { continue };
            if blocked[j] || (steps + 1) as i64 + next.manhattan(self.w) > self.len_cap as i64 {
                continue;
            }
            blocked[j] = true;
            if reaches(self.domain, j, self.w, &blocked, scratch) {
                out.push(j);
            }
            blocked[j] = false;
        }
        (ends, out)
    }

    fn extend<T: Scalar>(&self, node: &Node<T>, j: usize) -> Node<T> {
        let mut green = node.green.clone();
        let pivot = green_downdate(&mut green, j);
        let mut blocked = node.blocked.clone();
        blocked[j] = true;
        let mut path = node.path.clone();
        path.push(self.domain.interior()[j]);
        Node {
            path,
            blocked,
            green,
            log_theta: node.log_theta + pivot.ln(),
        }
    }

    fn finish<T: Scalar>(&self, node: &Node<T>) -> Node<T> {
        let mut path = node.path.clone();
        path.push(self.w);
        Node {
            path,
            blocked: node.blocked.clone(),
            green: node.green.clone(),
            log_theta: node.log_theta,
        }
    }

    /// Children in neighbour order, a finished path standing in the slot of `w`.
    fn children<T: Scalar>(&self, node: &Node<T>, out: &mut Vec<Task<T>>) {
        let mut scratch = Vec::new();
        let (ends, succ) = self.successors(node, &mut scratch);
        let here = *node.path.last().expect("nonempty");
        let mut succ = succ.into_iter().peekable();
        for next in here.neighbors() {
            if next == self.w && ends {
                out.push(Task::Leaf(self.finish(node)));
            } else if let Some(&j) = succ.peek() {
                if self.domain.interior()[j] == next {
                    out.push(Task::Subtree(self.extend(node, j)));
                    succ.next();
                }
            }
        }
    }

    fn dfs<T: Scalar, Acc, F>(&self, node: &mut Node<T>, acc: &mut Acc, visit: &F, scratch: &mut Vec<usize>) -> Result<()>
    where
        F: Fn(&mut Acc, &SaeLeaf<'_, T>),
    {
        self.count()?;
        let (ends, succ) = self.successors(node, scratch);
        let here = *node.path.last().expect("nonempty");
        let mut succ = succ.into_iter().peekable();
        for next in here.neighbors() {
            if next == self.w && ends {
                node.path.push(self.w);
                visit(acc, &node.leaf());
                node.path.pop();
            } else if let Some(&j) = succ.peek() {
                if self.domain.interior()[j] == next {
                    succ.next();
                    let mut child = self.extend(node, j);
                    self.dfs(&mut child, acc, visit, scratch)?;
                }
            }
        }
        Ok(())
    }
}

/// `sum_eta 4^{-|eta|} Theta_A(eta) h_{A minus eta}(x2, y2)` over self-avoiding
/// excursions `eta` from `x1` to `y1`.
pub fn fomin_n2_exact<T: Scalar>(
    domain: &LatticeDomain,
    x1: LatticePoint,
    x2: LatticePoint,
    y2: LatticePoint,
    y1: LatticePoint,
) -> Result<T> {
    fomin_n2_exact_budgeted(domain, [x1, x2, y2, y1], DEFAULT_ENUMERATION_BUDGET)
}

pub fn fomin_n2_exact_budgeted<T: Scalar>(
    domain: &LatticeDomain,
    [x1, x2, y2, y1]: [LatticePoint; 4],
    budget: usize,
) -> Result<T> {
    let mut seen = HashSet::new();
    for p in [x1, x2, y2, y1] {
        domain.require_boundary(p)?;
        if !seen.insert(p) {
            return Err(Error::CoincidentPoints(p));
        }
    }
    let green = GreenMatrix::<T>::new(domain)?;
    let quarter = T::lit(0.25);
    fold_saes(
        &green,
        x1,
        y1,
        default_len_cap(domain),
        budget,
        T::zero,
        |acc, leaf| {
            let n = leaf.points.len() - 1;
            let h = excursion_from_matrix(domain, leaf.green, x2, y2);
            *acc += quarter.powi(n as i32) * leaf.log_theta.exp() * h;
        },
        |a, b| a + b,
    )
}

/// Monte Carlo estimate of the probability that a loop-erased walk from `x1`
/// to `y1` and an independent excursion from `x2` to `y2` do not meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FominMc {
    pub probability: Estimate,
    pub h11: f64,
    pub h22: f64,
}

impl FominMc {
    /// The estimate converted to a mass, `P h(x1, y1) h(x2, y2)`.
    pub fn mass(&self) -> Estimate {
        let f = self.h11 * self.h22;
        Estimate {
            value: self.probability.value * f,
            std_error: self.probability.std_error * f,
            n: self.probability.n,
        }
    }
}

pub fn fomin_n2_mc<R: Rng + ?Sized>(
    domain: &LatticeDomain,
    [x1, x2, y2, y1]: [LatticePoint; 4],
    n_samples: usize,
    rng: &mut R,
) -> Result<FominMc> {
    let green = GreenMatrix::<f64>::new(domain)?;
    let first = ExcursionSampler::from_green(&green, x1, y1)?;
    let second = ExcursionSampler::from_green(&green, x2, y2)?;
    let mut stats = RunningStats::new();
    let mut marks = vec![u32::MAX; domain.len()];
    for trial in 0..n_samples as u32 {
        let eta = loop_erase(&first.sample(rng));
        for p in eta.inner() {
            marks[domain.index_of(*p).expect("interior")] = trial;
        }
        let omega = second.sample(rng);
        let hit = omega
            .inner()
            .iter()
            .any(|p| marks[domain.index_of(*p).expect("interior")] == trial);
        stats.push(if hit { 0.0 } else { 1.0 });
    }
    Ok(FominMc {
        probability: stats.estimate(),
        h11: first.kernel(),
        h22: second.kernel(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{excursion_kernel, fomin_determinant};
    use crate::loops::{m_star, theta};
    use crate::stats::rng_from_seed;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn walk(pts: &[(i64, i64)]) -> LatticeWalk {
        LatticeWalk::new(pts.iter().map(|&(x, y)| p(x, y)).collect()).unwrap()
    }

    #[test]
    fn erasure_fixed_point_and_bounce() {
        let sa = walk(&[(-1, 0), (0, 0), (1, 0), (2, 0)]);
        assert_eq!(loop_erase(&sa), sa);
        let bounce = walk(&[(-1, 0), (0, 0), (1, 0), (0, 0), (0, 1), (0, 2)]);
        assert_eq!(loop_erase(&bounce), walk(&[(-1, 0), (0, 0), (0, 1), (0, 2)]));
    }

    #[test]
    fn straight_excursion_through_a_single_point() {
        let a = LatticeDomain::new([p(0, 0)]);
        let saes = enumerate_saes(&a, p(-1, 0), p(1, 0), 10, 1000).unwrap();
        assert_eq!(saes.len(), 1);
        assert_eq!(saes[0].points(), &[p(-1, 0), p(0, 0), p(1, 0)]);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            assert_eq!(sample_excursion(&a, p(-1, 0), p(1, 0), &mut rng).unwrap(), saes[0].walk().clone());
        }
    }

    #[test]
    fn disconnected_endpoints_have_no_excursions() {
        let a = LatticeDomain::new([p(0, 0), p(3, 0)]);
        assert!(enumerate_saes(&a, p(-1, 0), p(4, 0), 10, 1000).unwrap().is_empty());
        assert!(matches!(
            ExcursionSampler::<f64>::new(&a, p(-1, 0), p(4, 0)),
            Err(Error::Unreachable { .. })
        ));
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let a = LatticeDomain::rectangle(0, 3, 0, 2);
        let s = ExcursionSampler::<f64>::new(&a, p(-1, 1), p(4, 0)).unwrap();
        assert!((s.transition_sum(p(-1, 1)).unwrap() - 1.0).abs() < 1e-12);
        for &u in a.interior() {
            assert!((s.transition_sum(u).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_the_excursion_kernel() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let (z, w) = (p(-1, 1), p(3, 1));
        let saes = enumerate_saes(&a, z, w, default_len_cap(&a), 1_000_000).unwrap();
        let total: f64 = saes.iter().map(|eta| lerw_weight_exact::<f64>(&a, eta).unwrap()).sum();
        let h: f64 = excursion_kernel(&a, z, w).unwrap();
        assert!((total - h).abs() < 1e-10 * h);
    }

    #[test]
    fn theta_equals_exp_m_star() {
        let a = LatticeDomain::rectangle(0, 2, 0, 1);
        for eta in enumerate_saes(&a, p(-1, 0), p(3, 1), 20, 1_000_000).unwrap() {
            let th: f64 = theta(&a, &eta).unwrap();
            let m: f64 = m_star(&a, eta.inner()).unwrap();
            assert!((th - m.exp()).abs() < 1e-10 * th);
        }
    }

    #[test]
    fn fold_visits_the_enumerated_paths_in_order() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let (z, w) = (p(0, -1), p(2, 3));
        let listed = enumerate_saes(&a, z, w, 20, 1_000_000).unwrap();
        let green = GreenMatrix::<f64>::new(&a).unwrap();
        let folded = fold_saes(
            &green,
            z,
            w,
            20,
            1_000_000,
            Vec::new,
            |acc: &mut Vec<Vec<LatticePoint>>, leaf| acc.push(leaf.points.to_vec()),
            |mut a, b| {
                a.extend(b);
                a
            },
        )
        .unwrap();
        let listed: Vec<Vec<LatticePoint>> = listed.iter().map(|e| e.points().to_vec()).collect();
        assert_eq!(folded, listed);
    }

    #[test]
    fn fomin_identity_on_a_small_box() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let (x1, x2, y2, y1) = (p(-1, 2), p(-1, 0), p(3, 0), p(3, 2));
        let lhs: f64 = fomin_n2_exact(&a, x1, x2, y2, y1).unwrap();
        let det: f64 = fomin_determinant(&a, &[x1, x2], &[y1, y2]).unwrap();
        assert!(lhs > 0.0);
        assert!((lhs - det).abs() < 1e-10 * det, "{lhs} vs {det}");
    }

    #[test]
    fn fomin_mc_is_certain_across_a_wall() {
        let a = LatticeDomain::new([p(0, 0), p(1, 0), p(0, 2), p(1, 2)]);
        let mut rng = rng_from_seed(11);
        let est = fomin_n2_mc(&a, [p(-1, 2), p(-1, 0), p(2, 0), p(2, 2)], 500, &mut rng).unwrap();
        assert_eq!(est.probability.value, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let a = LatticeDomain::rectangle(0, 3, 0, 3);
        assert!(matches!(
            enumerate_saes(&a, p(-1, 0), p(4, 3), 30, 50),
            Err(Error::Budget { .. })
        ));
    }
}
