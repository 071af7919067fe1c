use std::fmt::Write as _;

use super::{potential_kernel, LatticeDomain, LatticePoint};
use crate::error::{Error, Result};
use crate::linalg::{determinant, DenseMatrix, Lu};
use crate::scalar::Scalar;

/// Largest interior accepted by the dense solvers unless a cap is passed explicitly.
pub const DEFAULT_SIZE_CAP: usize = 20_000;

/// The substochastic step matrix `Q_A`: `1/4` between adjacent interior points.
pub fn step_matrix<T: Scalar>(domain: &LatticeDomain) -> DenseMatrix<T> {
    let n = domain.len();
    let quarter = T::lit(0.25);
    let mut q = DenseMatrix::zeros(n, n);
    for (i, &p) in domain.interior().iter().enumerate() {
        for nb in domain.interior_neighbors(p) {
            let j = domain.index_of(nb).expect("interior neighbour");
            q[(i, j)] = quarter;
        }
    }
    q
}

/// The Green's function `G_A = (I - Q_A)^{-1}` together with `log det(I - Q_A)`.
#[derive(Clone, Debug)]
pub struct GreenMatrix<T> {
    domain: LatticeDomain,
    green: DenseMatrix<T>,
    log_det: T,
}

impl<T: Scalar> GreenMatrix<T> {
    pub fn new(domain: &LatticeDomain) -> Result<Self> {
        Self::with_cap(domain, DEFAULT_SIZE_CAP)
    }

    pub fn with_cap(domain: &LatticeDomain, cap: usize) -> Result<Self> {
        if domain.len() > cap {
            return Err(Error::SizeCap {
                size: domain.len(),
                cap,
            });
        }
        let n = domain.len();
        let mut m = step_matrix::<T>(domain);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { T::one() } else { T::zero() };
                m[(i, j)] = delta - m[(i, j)];
            }
        }
        let (green, log_det) = if n == 0 {
            (DenseMatrix::zeros(0, 0), T::zero())
        } else {
            let lu = Lu::new(m)?;
            let (log_det, _) = lu.log_abs_determinant();
            (lu.inverse(), log_det)
        };
        Ok(Self {
            domain: domain.clone(),
            green,
            log_det,
        })
    }

    pub fn domain(&self) -> &LatticeDomain {
        &self.domain
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.green
    }

    /// `log det(I - Q_A)`; its negative is the total loop mass.
    pub fn log_det(&self) -> T {
        self.log_det
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.green[(i, j)]
    }

    pub fn get(&self, x: LatticePoint, y: LatticePoint) -> Result<T> {
        let i = self.domain.require_interior(x)?;
        let j = self.domain.require_interior(y)?;
        Ok(self.green[(i, j)])
    }

    /// Excursion kernel `h_A(z, w)`: first step, Green's function, last step,
    /// plus the direct step when `z` and `w` are adjacent.
    pub fn excursion(&self, z: LatticePoint, w: LatticePoint) -> Result<T> {
        self.domain.require_boundary(z)?;
        self.domain.require_boundary(w)?;
        if z == w {
            return Err(Error::CoincidentPoints(z));
        }
        Ok(self.excursion_unchecked(z, w))
    }

    pub(crate) fn excursion_unchecked(&self, z: LatticePoint, w: LatticePoint) -> T {
        excursion_from_matrix(&self.domain, &self.green, z, w)
    }

    /// Probability that walk from `u` exits `A` at `w`, for every interior `u`.
    pub fn hitting_vector(&self, w: LatticePoint) -> Vec<T> {
        let quarter = T::lit(0.25);
        let cols: Vec<usize> = self
            .domain
            .interior_neighbors(w)
            .map(|p| self.domain.index_of(p).expect("interior"))
            .collect();
        (0..self.domain.len())
            .map(|i| cols.iter().map(|&j| self.green[(i, j)]).sum::<T>() * quarter)
            .collect()
    }
}

/// `h(z, w)` read off a Green's matrix indexed like `domain`; rows of removed
/// points must already be zero.
pub(crate) fn excursion_from_matrix<T: Scalar>(
    domain: &LatticeDomain,
    g: &DenseMatrix<T>,
    z: LatticePoint,
    w: LatticePoint,
) -> T {
    let mut sum = T::zero();
    for zn in domain.interior_neighbors(z) {
        let i = domain.index_of(zn).expect("interior");
        for wn in domain.interior_neighbors(w) {
            let j = domain.index_of(wn).expect("interior");
            sum += g[(i, j)];
        }
    }
    let direct = if z.is_adjacent(w) { T::lit(0.25) } else { T::zero() };
    sum / T::lit(16.0) + direct
}

/// `G_A(x, y)` by a dense solve, subject to [`DEFAULT_SIZE_CAP`].
pub fn green_exact<T: Scalar>(domain: &LatticeDomain, x: LatticePoint, y: LatticePoint) -> Result<T> {
    green_exact_capped(domain, x, y, DEFAULT_SIZE_CAP)
}

pub fn green_exact_capped<T: Scalar>(
    domain: &LatticeDomain,
    x: LatticePoint,
    y: LatticePoint,
    cap: usize,
) -> Result<T> {
    domain.require_interior(x)?;
    domain.require_interior(y)?;
    GreenMatrix::with_cap(domain, cap)?.get(x, y)
}

/// `G_H(x, y) = a(x - conj(y)) - a(x - y)` for points strictly above the axis.
pub fn green_halfplane<T: Scalar>(x: LatticePoint, y: LatticePoint) -> Result<T> {
    for p in [x, y] {
        if p.y <= 0 {
            return Err(Error::NotInUpperHalfPlane(p));
        }
    }
    Ok(potential_kernel::<T>(x - y.conj()) - potential_kernel::<T>(x - y))
}

/// `h_H(j1, j2) = G_H(j1 + i, j2 + i) / 16` for distinct axis points.
pub fn halfplane_excursion_kernel<T: Scalar>(j1: i64, j2: i64) -> Result<T> {
    if j1 == j2 {
        return Err(Error::CoincidentPoints(LatticePoint::new(j1, 0)));
    }
    let g = green_halfplane::<T>(LatticePoint::new(j1, 1), LatticePoint::new(j2, 1))?;
    Ok(g / T::lit(16.0))
}

/// `h_A(z, w)` for distinct boundary points.
pub fn excursion_kernel<T: Scalar>(domain: &LatticeDomain, z: LatticePoint, w: LatticePoint) -> Result<T> {
    domain.require_boundary(z)?;
    domain.require_boundary(w)?;
    if z == w {
        return Err(Error::CoincidentPoints(z));
    }
    GreenMatrix::new(domain)?.excursion(z, w)
}

/// The matrix `[h_A(x_j, y_k)]`.
#[derive(Clone, Debug)]
pub struct HittingMatrix<T> {
    sources: Vec<LatticePoint>,
    targets: Vec<LatticePoint>,
    values: DenseMatrix<T>,
}

impl<T: Scalar> HittingMatrix<T> {
    pub fn new(domain: &LatticeDomain, sources: &[LatticePoint], targets: &[LatticePoint]) -> Result<Self> {
        Self::from_green(&GreenMatrix::new(domain)?, sources, targets)
    }

    pub fn from_green(green: &GreenMatrix<T>, sources: &[LatticePoint], targets: &[LatticePoint]) -> Result<Self> {
        if sources.len() != targets.len() || sources.is_empty() {
            return Err(Error::ArityMismatch {
                sources: sources.len(),
                targets: targets.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for &p in sources.iter().chain(targets) {
            green.domain().require_boundary(p)?;
            if !seen.insert(p) {
                return Err(Error::CoincidentPoints(p));
            }
        }
        let n = sources.len();
        let mut values = DenseMatrix::zeros(n, n);
        for (j, &x) in sources.iter().enumerate() {
            for (k, &y) in targets.iter().enumerate() {
                values[(j, k)] = green.excursion_unchecked(x, y);
            }
        }
        Ok(Self {
            sources: sources.to_vec(),
            targets: targets.to_vec(),
            values,
        })
    }

    pub fn sources(&self) -> &[LatticePoint] {
        &self.sources
    }

    pub fn targets(&self) -> &[LatticePoint] {
        &self.targets
    }

    pub fn values(&self) -> &DenseMatrix<T> {
        &self.values
    }

    pub fn determinant(&self) -> T {
        determinant(&self.values)
    }

    /// CSV with a header row naming the targets and one row per source.
    pub fn to_csv(&self) -> String {
        let label = |p: &LatticePoint| format!("{}:{}", p.x, p.y);
        let mut out = String::from("source");
        for y in &self.targets {
            let _ = write!(out, ",{}", label(y));
        }
        out.push('\n');
        for (j, x) in self.sources.iter().enumerate() {
            out.push_str(&label(x));
            for k in 0..self.targets.len() {
                let _ = write!(out, ",{:e}", self.values[(j, k)].as_f64());
            }
            out.push('\n');
        }
        out
    }
}

/// `det[h_A(x_j, y_k)]`.
pub fn fomin_determinant<T: Scalar>(
    domain: &LatticeDomain,
    xs: &[LatticePoint],
    ys: &[LatticePoint],
) -> Result<T> {
    Ok(HittingMatrix::new(domain, xs, ys)?.determinant())
}
