//! Integer-lattice infrastructure: points, finite domains, walks, Green's
//! functions, excursion kernels and hitting-matrix determinants.

mod green;
mod potential;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use green::{
    excursion_kernel, fomin_determinant, green_exact, green_exact_capped, green_halfplane,
    halfplane_excursion_kernel, step_matrix, GreenMatrix, HittingMatrix, DEFAULT_SIZE_CAP,
};
pub(crate) use green::excursion_from_matrix;
pub use potential::{potential_kernel, PotentialKernel, EXACT_RADIUS};

/// A point `x + iy` of the square lattice.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

/// Neighbour offsets in the fixed order `+1, +i, -1, -i`.
pub const STEPS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// The four nearest neighbours in the order `+1, +i, -1, -i`.
    pub fn neighbors(self) -> [LatticePoint; 4] {
        STEPS.map(|(dx, dy)| LatticePoint::new(self.x + dx, self.y + dy))
    }

    pub fn is_adjacent(self, other: LatticePoint) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }

    pub fn conj(self) -> Self {
        Self::new(self.x, -self.y)
    }

    pub fn manhattan(self, other: LatticePoint) -> i64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

impl std::ops::Sub for LatticePoint {
    type Output = LatticePoint;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for LatticePoint {
    type Output = LatticePoint;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from((x, y): (i64, i64)) -> Self {
        Self::new(x, y)
    }
}

/// A finite set of interior points `A`, with its outer boundary
/// `{z : dist(z, A) = 1}` and a dense index over the interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeDomain {
    interior: Vec<LatticePoint>,
    boundary: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
}

impl LatticeDomain {
    pub fn new<I: IntoIterator<Item = LatticePoint>>(points: I) -> Self {
        let interior: Vec<LatticePoint> = points.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: HashMap<LatticePoint, usize> =
            interior.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let boundary: BTreeSet<LatticePoint> = interior
            .iter()
            .flat_map(|p| p.neighbors())
            .filter(|q| !index.contains_key(q))
            .collect();
        Self {
            interior,
            boundary: boundary.into_iter().collect(),
            index,
        }
    }

    /// The rectangle `{x0..=x1} x {y0..=y1}`.
    pub fn rectangle(x0: i64, x1: i64, y0: i64, y1: i64) -> Self {
        Self::new((x0..=x1).flat_map(|x| (y0..=y1).map(move |y| LatticePoint::new(x, y))))
    }

    /// Interior points in sorted order; the position is the dense index.
    pub fn interior(&self) -> &[LatticePoint] {
        &self.interior
    }

    pub fn boundary(&self) -> &[LatticePoint] {
        &self.boundary
    }

    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        self.index.contains_key(&p)
    }

    pub fn index_of(&self, p: LatticePoint) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn is_boundary(&self, p: LatticePoint) -> bool {
        !self.contains(p) && p.neighbors().iter().any(|q| self.contains(*q))
    }

    pub fn require_interior(&self, p: LatticePoint) -> Result<usize> {
        self.index_of(p).ok_or(Error::NotInterior(p))
    }

    pub fn require_boundary(&self, p: LatticePoint) -> Result<()> {
        if self.is_boundary(p) {
            Ok(())
        } else {
            Err(Error::NotBoundary(p))
        }
    }

    /// Interior neighbours of `p` in the fixed neighbour order.
    pub fn interior_neighbors(&self, p: LatticePoint) -> impl Iterator<Item = LatticePoint> + '_ {
        p.neighbors().into_iter().filter(move |q| self.contains(*q))
    }

    pub fn without<'a, I: IntoIterator<Item = &'a LatticePoint>>(&self, removed: I) -> Self {
        let removed: HashSet<LatticePoint> = removed.into_iter().copied().collect();
        Self::new(self.interior.iter().copied().filter(|p| !removed.contains(p)))
    }

    pub fn union(&self, other: &LatticeDomain) -> Self {
        Self::new(self.interior.iter().chain(other.interior.iter()).copied())
    }

    pub fn is_subset_of(&self, other: &LatticeDomain) -> bool {
        self.interior.iter().all(|p| other.contains(*p))
    }

    /// Whether `to` can be reached from `from` by a walk whose intermediate
    /// points are interior and not blocked.
    pub fn connects(&self, from: LatticePoint, to: LatticePoint, blocked: &HashSet<LatticePoint>) -> bool {
        let mut seen: HashSet<LatticePoint> = HashSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(from);
        seen.insert(from);
        while let Some(p) = queue.pop_front() {
            for q in p.neighbors() {
                if q == to {
                    return true;
                }
                if self.contains(q) && !blocked.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        false
    }

    /// One point per line, `"x y"`, in sorted order.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 8);
        for p in &self.interior {
            out.push_str(&format!("{} {}\n", p.x, p.y));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<i64> {
                s.ok_or_else(|| Error::Parse(format!("line {}: expected two integers", lineno + 1)))?
                    .parse::<i64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = parse(parts.next())?;
            let y = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            points.push(LatticePoint::new(x, y));
        }
        Ok(Self::new(points))
    }
}

/// A nearest-neighbour path `[w_0, ..., w_n]`; its length is the number of steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeWalk {
    points: Vec<LatticePoint>,
}

impl LatticeWalk {
    pub fn new(points: Vec<LatticePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidWalk("empty point sequence".into()));
        }
        if let Some(w) = points.windows(2).find(|w| !w[0].is_adjacent(w[1])) {
            return Err(Error::InvalidWalk(format!("{} and {} are not adjacent", w[0], w[1])));
        }
        Ok(Self { points })
    }

    pub(crate) fn from_trusted(points: Vec<LatticePoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0].is_adjacent(w[1])));
        Self { points }
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<LatticePoint> {
        self.points
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() == 1
    }

    pub fn start(&self) -> LatticePoint {
        self.points[0]
    }

    pub fn end(&self) -> LatticePoint {
        *self.points.last().expect("walks are nonempty")
    }

    /// The points strictly between the endpoints.
    pub fn inner(&self) -> &[LatticePoint] {
        if self.points.len() <= 2 {
            &[]
        } else {
            &self.points[1..self.points.len() - 1]
        }
    }

    pub fn reversed(&self) -> Self {
        let mut p = self.points.clone();
        p.reverse();
        Self { points: p }
    }

    /// Whether this is an excursion in `domain` from `z` to `w`: endpoints on
    /// the boundary, every intermediate point in the interior.
    pub fn is_excursion_in(&self, domain: &LatticeDomain) -> bool {
        self.len() >= 1
            && domain.is_boundary(self.start())
            && domain.is_boundary(self.end())
            && self.inner().iter().all(|p| domain.contains(*p))
    }

    pub fn is_self_avoiding(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.points.len());
        self.points.iter().all(|p| seen.insert(*p))
    }

    /// Formats the walk as `x,y;x,y;...`.
    pub fn key(&self) -> String {
        self.points
            .iter()
            .map(|p| format!("{},{}", p.x, p.y))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl fmt::Display for LatticeWalk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    #[test]
    fn adjacency_is_a_unit_step_in_one_coordinate() {
        assert!(p(0, 0).is_adjacent(p(1, 0)));
        assert!(p(0, 0).is_adjacent(p(0, -1)));
        assert!(!p(0, 0).is_adjacent(p(1, 1)));
        assert!(!p(0, 0).is_adjacent(p(0, 0)));
        assert!(!p(0, 0).is_adjacent(p(2, 0)));
    }

    #[test]
    fn boundary_of_a_rectangle_excludes_corners() {
        let a = LatticeDomain::rectangle(1, 2, 1, 1);
        assert_eq!(a.len(), 2);
        let expected: Vec<_> = vec![p(0, 1), p(1, 0), p(1, 2), p(2, 0), p(2, 2), p(3, 1)];
        assert_eq!(a.boundary(), expected.as_slice());
        assert!(!a.is_boundary(p(0, 0)));
        assert!(!a.is_boundary(p(1, 1)));
    }

    #[test]
    fn text_format_round_trips_sorted() {
        let a = LatticeDomain::new([p(2, 1), p(0, 0), p(1, 0)]);
        let text = a.to_text();
        assert_eq!(text, "0 0\n1 0\n2 1\n");
        assert_eq!(LatticeDomain::from_text(&text).unwrap(), a);
        assert!(LatticeDomain::from_text("1 2 3\n").is_err());
        assert!(LatticeDomain::from_text("1 x\n").is_err());
    }

    #[test]
    fn walk_validation() {
        assert!(LatticeWalk::new(vec![p(0, 0), p(1, 1)]).is_err());
        let w = LatticeWalk::new(vec![p(0, 0), p(0, 1), p(1, 1)]).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w.inner(), &[p(0, 1)]);
        assert!(w.is_self_avoiding());
        assert_eq!(w.reversed().start(), p(1, 1));
    }

    #[test]
    fn excursion_membership() {
        let a = LatticeDomain::rectangle(1, 1, 1, 1);
        let w = LatticeWalk::new(vec![p(0, 1), p(1, 1), p(2, 1)]).unwrap();
        assert!(w.is_excursion_in(&a));
        let bad = LatticeWalk::new(vec![p(0, 1), p(1, 1), p(1, 2), p(1, 1), p(2, 1)]).unwrap();
        assert!(!bad.is_excursion_in(&a));
    }

    #[test]
    fn connectivity_respects_blocked_points() {
        let a = LatticeDomain::rectangle(1, 3, 1, 1);
        let blocked: HashSet<_> = [p(2, 1)].into_iter().collect();
        assert!(a.connects(p(0, 1), p(4, 1), &HashSet::new()));
        assert!(!a.connects(p(0, 1), p(4, 1), &blocked));
    }
}
